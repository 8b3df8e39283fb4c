RUN_CONFIG = {

    # ----------------------------------------
    # Reproducibility
    # ----------------------------------------
    "seed": 20240601,

    # ----------------------------------------
    # Built-in digit systems
    # measures are listed in user order, as "p/q" strings
    # ----------------------------------------
    "presets": {
        "base10": {"symbols": list("0123456789"), "measures": ["1/10"] * 10},
        "base2": {"symbols": ["0", "1"], "measures": ["1/2", "1/2"]},
        "gls3": {"symbols": ["0", "1", "2"], "measures": ["1/2", "1/4", "1/4"]},
    },

    # ----------------------------------------
    # Enumeration
    # ----------------------------------------
    "tie_break": "length-lex",          # length-lex | lex | length-revlex
    "gen_digit_budget": 10_000_000,     # hard cap on digits emitted by `gen`

    # ----------------------------------------
    # Normality statistics
    # ----------------------------------------
    "default_K": 3,
    "hot_spot_row_cap": 4096,           # max rows (sum_k D^k) before BudgetExceeded / top-measure fallback

    # ----------------------------------------
    # Numeric tolerances
    # ----------------------------------------
    "dual_path_rel_tol": 1e-9,          # exact vs log-space S paths
    "dual_path_max_value": 10**15,
    "fmax_rel_tol": 1e-9,               # F~(p) = -log eps
    "gradient_abs_tol": 1e-7,
    "hessian_rel_tol": 1e-5,            # closed form vs central differences
    "hessian_eps_tol": 1e-6,            # A must not move with eps
    "eig_tol": 1e-10,
    "segment_abs_tol": 1e-10,

    # ----------------------------------------
    # Empirical bands (the asymptotic relations carry no explicit constants)
    # ----------------------------------------
    "sbound_band": 4.0,
    "sandwich_band": 8.0,
    "hbound_band": 4.0,

    # ----------------------------------------
    # Randomized lemma checks
    # ----------------------------------------
    "lemma_draws": 10_000,
    "concavity_trials": 10_000,
    "gradient_directions": 50,
    "taylor_samples": 1_000,
}

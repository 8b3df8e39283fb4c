from __future__ import annotations

import json
import logging
import re
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path

from src.config.run_config import RUN_CONFIG
from src.errors import ConfigError, EpsilonOutOfRange

logger = logging.getLogger(__name__)

SCHEMA_HELP = (
    'System config JSON: {"digits": [{"symbol": "<string>", "measure": "<p>/<q>"}, ...]}; '
    "measures are exact rationals written as strings and must sum to 1. "
    "A preset name (" + ", ".join(RUN_CONFIG["presets"]) + ") or an inline list such as "
    '"1/2,1/4,1/4" is accepted as well.'
)

# shipped system configs (base10.json, base2.json, gls3.json)
CONFIGS_DIR = Path(__file__).resolve().parents[2] / "configs"

_POWER = re.compile(r"^\s*(\d+)\s*\^\s*(-?\d+)\s*$")


def parse_rational(value) -> Fraction:
    """
    Convert user input to an exact Fraction.

    Accepts Fraction, int, "p/q", "n", "2^-k" and decimal strings.  Floats
    and decimal strings are converted exactly, with a warning, since the
    value the user typed may not be the value they meant.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ConfigError(f"Not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        out = Fraction(value)
        logger.warning(f"Float {value!r} converted to exact rational {out}")
        return out
    if not isinstance(value, str):
        raise ConfigError(f"Not a rational: {value!r}")

    text = value.strip()
    m = _POWER.match(text)
    if m:
        return Fraction(int(m.group(1))) ** int(m.group(2))
    if re.fullmatch(r"[+-]?\d+\s*/\s*[+-]?\d+|[+-]?\d+", text):
        try:
            return Fraction(text.replace(" ", ""))
        except ZeroDivisionError:
            raise ConfigError(f"Zero denominator in {value!r}")
    try:
        out = Fraction(Decimal(text))
    except (InvalidOperation, ValueError):
        raise ConfigError(f"Cannot parse {value!r} as a rational (expected 'p/q')")
    logger.warning(f"Decimal {value!r} converted to exact rational {out}")
    return out


def format_rational(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def read_system_json(path: str | Path) -> tuple[list[Fraction], list[str]]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"System config not found: {path}")

    with open(path, "r") as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path} is not valid JSON: {e}")

    if not isinstance(raw, dict) or "digits" not in raw:
        raise ConfigError(f"Expected key 'digits' in {path}")

    measures, symbols = [], []
    for i, entry in enumerate(raw["digits"]):
        if not isinstance(entry, dict) or "measure" not in entry:
            raise ConfigError(f"Digit entry {i} in {path} has no 'measure'")
        measures.append(parse_rational(entry["measure"]))
        symbols.append(str(entry.get("symbol", i)))
    return measures, symbols


def load_system(source, config=RUN_CONFIG):
    """
    Build a DigitSystem from a JSON path, a preset name, or an inline list.

    Parameters
    ----------
    source : str | Path | sequence
        Path to a JSON config, a key of ``config["presets"]``, an inline
        string "1/2,1/4,1/4", or a sequence of rationals.
    """
    from src.fibred_system.digit_system import make_system

    if isinstance(source, (list, tuple)):
        return make_system(source)

    text = str(source)
    if Path(text).suffix == ".json" or Path(text).exists():
        path = Path(text)
        if not path.exists() and (CONFIGS_DIR / path.name).exists():
            path = CONFIGS_DIR / path.name
        measures, symbols = read_system_json(path)
        return make_system(measures, symbols)

    presets = config["presets"]
    if text in presets:
        preset = presets[text]
        return make_system(preset["measures"], preset.get("symbols"))

    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) >= 1 and all(re.fullmatch(r"[\d/^+\-.\s]+", p) for p in parts):
        return make_system(parts)

    raise ConfigError(f"Unrecognised system source {text!r}. {SCHEMA_HELP}")


def system_metadata(sys) -> dict:
    return {
        "D": sys.D,
        "symbols": list(sys.symbols),
        "measures": [format_rational(m) for m in sys.measures],
        "user_order": list(sys.user_order),
    }


def write_system_json(sys, path: str | Path) -> Path:
    """Write a system in user order (the order it was given in)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    entries = [None] * sys.D
    for i, pos in enumerate(sys.user_order):
        entries[pos] = {"symbol": sys.symbols[i], "measure": format_rational(sys.measures[i])}
    with open(path, "w") as f:
        json.dump({"digits": entries}, f, indent=2)
        f.write("\n")
    return path


def check_epsilon(eps, upper_inclusive: bool = True) -> Fraction:
    """Parse eps exactly and require 0 < eps <= 1 (or < 1 when upper_inclusive is False)."""
    eps = parse_rational(eps)
    if eps <= 0 or eps > 1 or (eps == 1 and not upper_inclusive):
        bound = "(0, 1]" if upper_inclusive else "(0, 1)"
        raise EpsilonOutOfRange(f"eps must lie in {bound}, got {eps}")
    return eps

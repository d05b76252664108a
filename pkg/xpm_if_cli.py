from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

try:
    from dotenv import load_dotenv
except ModuleNotFoundError:  # pragma: no cover - optional for unit tests
    load_dotenv = None  # type: ignore[assignment,misc]

if load_dotenv is not None:
    # Load root `.env` before importing package modules that read env at import time.
    load_dotenv(dotenv_path=Path(__file__).resolve().parent / ".env", override=False)

from xpm_if import config
from xpm_if.errors import ConfigError, NumericalError, ParameterError
from xpm_if.harness import recipes
from xpm_if.harness.presets import load_config

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_GATE = 3

logger = logging.getLogger("xpm_if.cli")


def _setup_logging(verbose: bool) -> None:
    root = logging.getLogger("xpm_if")
    root.setLevel(logging.DEBUG if verbose else getattr(logging, str(config.LOG_LEVEL).upper(), logging.INFO))
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(levelname)s:%(name)s:%(message)s"))
        root.addHandler(handler)
    root.propagate = False


def _float_list(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _int_list(text: str) -> List[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment JSON (may `extends` a preset)")
    common.add_argument("--preset", choices=("desk", "paper"), help="preset to use or extend")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--if-mode", choices=("constant", "evolving", "both"))
    common.add_argument("--k-mode", choices=("coherent", "incoherent"))
    common.add_argument("--threads", type=int, help="worker processes")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="xpm_if_cli", description="XPM with evolving intensity fluctuations")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("single-span", parents=[common], help="one span, analytic vs SSFM phase spectrum")
    p = sub.add_parser("multi-span", parents=[common], help="N spans, constant/evolving IF vs SSFM")
    p.add_argument("--spans", type=int, help="override link.num_spans")
    p = sub.add_parser("sweep", parents=[common], help="average phase variance against one parameter")
    p.add_argument("--param", required=True, choices=("distance", "dispersion", "spacing", "power"))
    p.add_argument("--values", type=_float_list, help="comma separated values (default from config)")
    p = sub.add_parser("ber", parents=[common], help="BER against launch power")
    p.add_argument("--powers", type=_float_list, help="comma separated dBm values")
    p = sub.add_parser("q-ratio", parents=[common], help="Monte-Carlo expectation ratio table")
    p.add_argument("--spans", type=_int_list, help="comma separated N values")
    p.add_argument("--c-points", type=int)
    p.add_argument("--trials", type=int)
    sub.add_parser("validate", parents=[common], help="run the self-test gates")
    p = sub.add_parser("link-factor", parents=[common], help="fixed delta-lambda XPM response")
    p.add_argument("--delta-lambda", type=float, default=0.4, help="nm")
    p.add_argument("--if-cache", type=Path, help="IF stack written by multi-span")
    return parser


def _dispatch(args: argparse.Namespace) -> recipes.RecipeResult:
    cfg = load_config(args.config, preset=args.preset)
    cfg = cfg.with_overrides(
        seed=args.seed,
        out_dir=args.out,
        threads=args.threads,
        if_mode=args.if_mode,
        k_mode=args.k_mode,
    )
    match args.command:
        case "single-span":
            return recipes.cmd_single_span(cfg)
        case "multi-span":
            return recipes.cmd_multi_span(cfg, args.spans)
        case "sweep":
            return recipes.cmd_sweep(cfg, args.param, args.values)
        case "ber":
            return recipes.cmd_ber(cfg, args.powers)
        case "q-ratio":
            return recipes.cmd_q_ratio(cfg, args.spans, args.c_points, args.trials)
        case "validate":
            return recipes.cmd_validate(cfg)
        case "link-factor":
            return recipes.cmd_link_factor(cfg, args.delta_lambda, args.if_cache)
    raise ValueError(f"unknown command {args.command!r}")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.verbose)
    try:
        result = _dispatch(args)
    except ConfigError as exc:
        logger.error("config error: %s", exc)
        for path, msg in exc.diagnostics:
            logger.error("  %s: %s", path, msg)
        return EXIT_CONFIG
    except ParameterError as exc:
        logger.error("invalid parameters: %s", exc)
        return EXIT_CONFIG
    except NumericalError as exc:
        logger.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL

    for name, ok in result.gates.items():
        logger.info("gate %-28s %s", name, "ok" if ok else "FAIL")
    if args.command == "validate" and not result.passed:
        return EXIT_GATE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""``qfic`` command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical non-convergence,
4 I/O failure.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path

from .collision import NonConvergenceError
from .config import ConfigError, parse_config
from .devicesim import CalibrationError, PositivityError
from .experiments import run_experiment
from .fisher import SingularFisherError
from .output import format_csv, write_csv, write_svg

log = logging.getLogger("qfic")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="qfic: %(message)s")
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except SystemExit as exc:  # argparse: --help or unknown flag
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG

    try:
        res = run_experiment(cfg)
    except (NonConvergenceError, CalibrationError, PositivityError,
            SingularFisherError) as exc:
        log.error("%s failed: %s", cfg.experiment, exc)
        return EXIT_NUMERIC
    except ValueError as exc:
        log.error("%s: invalid parameters: %s", cfg.experiment, exc)
        return EXIT_CONFIG

    try:
        if cfg.out is None:
            sys.stdout.write(format_csv(res))
        else:
            write_csv(res, cfg.out)
            log.info("wrote %d rows to %s", len(res), cfg.out)
        if cfg.svg:
            svg_path = Path(cfg.out).with_suffix(".svg") if cfg.out else Path(
                f"{cfg.experiment}.svg")
            write_svg(res, svg_path)
            log.info("wrote %s", svg_path)
    except OSError as exc:
        log.error("cannot write output: %s", exc)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

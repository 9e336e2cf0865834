"""Standalone command: run one exporter job file."""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .errors import ConfigurationError, JobError
from .job import load_job
from .runner import export_predictions


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="hf-export",
        description="Fine-tune an encoder checkpoint and export three-class predictions.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--job", required=True, help="job file (JSON)")
    args = parser.parse_args(argv)
    try:
        job = load_job(args.job)
        output = export_predictions(job)
    except (JobError, ConfigurationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(f"wrote {output}")
    print(f"wrote {output}.manifest.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())

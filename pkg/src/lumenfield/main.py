"""
Command-line entry point.

Exit status: 0 on success, 1 when a command fails at run time, 2 on usage
errors (reported by argparse).
"""

import logging
import sys
from typing import List, Optional

from .commands import create_registry
from .errors import LumenfieldError

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, configure logging and run one subcommand."""
    registry = create_registry()
    parser = registry.build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format=LOG_FORMAT)
    try:
        return registry.execute_command(args.command, args)
    except (LumenfieldError, OSError) as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

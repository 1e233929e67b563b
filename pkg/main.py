import logging
import sys

from config.settings import settings
from handlers.cli_handler import dispatch
from utils.logging_config import setup_logging


def main() -> None:
    """Run the burgers-reductions command line."""
    setup_logging(settings.LOG_LEVEL)
    logger = logging.getLogger(__name__)

    try:
        code = dispatch(sys.argv[1:])
    except KeyboardInterrupt:
        logger.info("Interrupted")
        code = 130
    except Exception as e:
        logger.error(f"Fatal error: {e}", exc_info=True)
        raise

    sys.exit(code)


if __name__ == "__main__":
    main()

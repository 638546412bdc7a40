import logging
import sys

from config import Config
from cmvkit.cli import run_command

if __name__ == "__main__":
    Config.validate()
    logging.basicConfig(
        level=Config.LOG_LEVEL.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    sys.exit(run_command(sys.argv[1:]))

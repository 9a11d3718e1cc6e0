"""
Process settings for the surface wave solver, read from the environment.
"""

import logging
import os

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Logging
LOG_LEVEL = os.getenv("SURFACE_WAVES_LOG_LEVEL", "INFO").upper()
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# Column-parallel scans; 1 keeps everything in-process
WORKERS = max(1, int(os.getenv("SURFACE_WAVES_WORKERS", "1")))

# Config used by the CLI when --config is omitted
DEFAULT_CONFIG_PATH = os.getenv("SURFACE_WAVES_DEFAULT_CONFIG")


def configure_logging(level: str = LOG_LEVEL) -> None:
    """Configure root logging once for command-line runs"""
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format=LOG_FORMAT)

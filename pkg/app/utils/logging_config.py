# app/utils/logging_config.py

import logging
from logging.handlers import RotatingFileHandler

from app.core.config import settings

# Configure logger
log_formatter = logging.Formatter('[%(asctime)s] - %(levelname)s - %(message)s')

# File handler for writing logs to a file
file_handler = RotatingFileHandler(settings.LOG_FILE, maxBytes=5 * 1024 * 1024, backupCount=5, delay=True)
file_handler.setFormatter(log_formatter)
file_handler.setLevel(logging.INFO)

# Stream handler for sending logs to stderr
stream_handler = logging.StreamHandler()
stream_handler.setFormatter(log_formatter)
stream_handler.setLevel(logging.DEBUG)

# Create and configure the logger
logger = logging.getLogger("fsi_logger")
logger.setLevel(settings.LOG_LEVEL.upper())
if not logger.handlers:
    logger.addHandler(file_handler)  # Write to file
    logger.addHandler(stream_handler)  # Write to stderr

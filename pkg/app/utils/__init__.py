from .logging_config import logger

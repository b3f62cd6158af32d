from .run_config import RunConfig, dump_config, load_config, parse_config

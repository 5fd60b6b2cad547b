from .config_loader import SweepConfigLoader, parse_config

__all__ = ["SweepConfigLoader", "parse_config"]

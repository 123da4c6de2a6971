# Subcommand drivers shared by the management command and the api views
from .config import ConfigError, RunConfig, build_config, resolve_metric, resolve_points
from .curvature import cmd_curvature
from .check import cmd_check
from .verify import cmd_verify
from .flow import cmd_flow, hopf_series

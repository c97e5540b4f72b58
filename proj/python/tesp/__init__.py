from ._tesp import *  # noqa: F401,F403
from ._tesp import ConfigError, DimensionError, IllPosedError, UnsupportedError, __doc__  # noqa: F401

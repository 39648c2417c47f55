"""cumret - cost-adjusted cumulative returns and technical-rule bootstrap backtesting."""

from .version import __version__

__all__ = ["__version__"]

"""Version information for cumret."""

__version__ = "1.0.0"

ARTIFACT_VERSION = f"cumret-{__version__}"

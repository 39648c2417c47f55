"""Allow running cumret as a module with python -m cumret."""

from .cli import app

if __name__ == "__main__":
    app()

"""Test version command output."""

import subprocess
import sys


def test_version_command_output():
    """python -m cumret version prints the package version."""
    result = subprocess.run(
        [sys.executable, "-m", "cumret", "--log-level", "ERROR", "version"],
        capture_output=True,
        text=True,
        timeout=60,
    )

    assert result.returncode == 0, f"Version command failed: {result.stderr}"
    assert result.stdout.strip() == "cumret 1.0.0"


def test_version_import():
    """The module version matches the CLI."""
    from cumret.version import __version__

    assert __version__ == "1.0.0"

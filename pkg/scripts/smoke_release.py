#!/usr/bin/env python3
"""Smoke test script for release verification."""

import json
import subprocess
import sys
import tempfile
from pathlib import Path


def run_command(cmd: list[str]) -> tuple[int, str, str]:
    """Run a command and return exit code, stdout, stderr."""
    try:
        result = subprocess.run(
            cmd,
            capture_output=True,
            text=True,
            timeout=120,
        )
        return result.returncode, result.stdout, result.stderr
    except subprocess.TimeoutExpired:
        return 1, "", f"Command timed out: {' '.join(cmd)}"
    except Exception as e:
        return 1, "", str(e)


def main():
    """Run smoke tests for release."""
    print("=" * 60)
    print("cumret Release Smoke Test")
    print("=" * 60)

    # Test 1: Check version
    print("\n[1/4] Checking version...")
    code, stdout, stderr = run_command(["cumret", "version"])
    if code != 0:
        print(f"  [FAIL] Version command failed: {stderr}")
        return 1
    print(f"  [OK] Version: {stdout.strip()}")

    with tempfile.TemporaryDirectory() as temp_dir:
        out = Path(temp_dir)
        quiet = ["cumret", "--log-level", "WARNING", "--out", str(out)]

        # Test 2: Synthetic fixture
        print("\n[2/4] Writing a synthetic walk...")
        code, stdout, stderr = run_command([*quiet, "synth", "--bars", "1500", "--symbol", "SMOKE"])
        if code != 0:
            print(f"  [FAIL] synth failed: {stderr}")
            return 1
        data = out / "SMOKE.csv"
        print(f"  [OK] {stdout.strip()}")

        # Test 3: Bootstrap on every rule
        print("\n[3/4] Running a small bootstrap...")
        code, stdout, stderr = run_command(
            [*quiet, "bootstrap", "--data", str(data), "--M", "20", "--min-window", "260"]
        )
        if code != 0:
            print(f"  [FAIL] bootstrap failed: {stderr}")
            return 1
        print(f"  [OK] {stdout.strip()}")

        # Test 4: Bound audit
        print("\n[4/4] Auditing the upper bound...")
        code, stdout, stderr = run_command([*quiet, "bound", "--stress", "2000", "--nmax", "500"])
        if code != 0:
            print(f"  [FAIL] bound audit failed: {stderr or stdout}")
            return 1
        summary = json.loads(stdout.strip().splitlines()[-1])
        print(f"  [OK] {summary['cases']} cases, {summary['violations']} violations")

    print("\n" + "=" * 60)
    print("[OK] All smoke tests passed!")
    print("=" * 60)
    return 0


if __name__ == "__main__":
    sys.exit(main())

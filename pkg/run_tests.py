#!/usr/bin/env python3
"""Test runner script for the ionization laboratory."""

import os
import subprocess
import sys
from pathlib import Path


def run_command(command, description):
    """Run a command and handle errors."""
    print(f"\n{'='*60}")
    print(f"Running: {description}")
    print(f"Command: {command}")
    print(f"{'='*60}")

    try:
        result = subprocess.run(command, shell=True, check=True, capture_output=True, text=True)
        print("✅ SUCCESS")
        if result.stdout:
            print("Output:")
            print(result.stdout)
        return True
    except subprocess.CalledProcessError as e:
        print("❌ FAILED")
        print(f"Error: {e}")
        if e.stdout:
            print("Output:")
            print(e.stdout)
        if e.stderr:
            print("Error output:")
            print(e.stderr)
        return False


def main():
    """Run the fast suites, then coverage, lint and type checks; --slow adds the acceptance sweeps."""
    print("🧪 ionlab Test Runner")
    print("=" * 60)

    os.chdir(Path(__file__).parent)
    marker = "" if "--slow" in sys.argv[1:] else ' -m "not slow"'

    test_commands = [
        (f"python -m pytest tests/unit/{marker} --no-cov", "Unit Tests"),
        (f"python -m pytest tests/integration/{marker} --no-cov", "Integration Tests"),
        (f"python -m pytest tests/ -n auto{marker}", "All Tests with Coverage"),
        ("python -m flake8 ionlab/ tests/ --max-line-length=120 --ignore=E203,W503", "Code Linting"),
        ("python -m mypy ionlab/ --ignore-missing-imports", "Type Checking"),
    ]

    results = []
    for command, description in test_commands:
        success = run_command(command, description)
        results.append((description, success))

    print(f"\n{'='*60}")
    print("📊 TEST SUMMARY")
    print(f"{'='*60}")

    failed = [description for description, success in results if not success]
    for description, success in results:
        status = "✅ PASSED" if success else "❌ FAILED"
        print(f"{status} - {description}")

    print(f"\nTotal: {len(results)} | Passed: {len(results) - len(failed)} | Failed: {len(failed)}")
    if failed:
        print("\n❌ Some checks failed. Please check the output above.")
        sys.exit(1)
    print("\n🎉 All checks passed!")
    sys.exit(0)


if __name__ == "__main__":
    main()

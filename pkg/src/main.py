"""
Console entry point.
"""
import os

from src.config.settings import export_thread_count

# BLAS pools read these when numpy is first imported
export_thread_count(int(os.getenv("VRMHD_THREADS", 1)))

from src.cli.commands import cli  # noqa: E402


def main():
    cli(prog_name="vrmhd")


if __name__ == "__main__":
    main()

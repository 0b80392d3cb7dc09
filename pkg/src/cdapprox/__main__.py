"""Entry point for ``python -m cdapprox``."""

from cdapprox.cli import main

if __name__ == "__main__":
    raise SystemExit(main())

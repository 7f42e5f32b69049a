"""
Entry point for running the package as a module: python -m ridgeprox
"""
from .cli import main

if __name__ == "__main__":
    main()

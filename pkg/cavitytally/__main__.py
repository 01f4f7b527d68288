# python3
# __main__.py
# Allows the command line tool to be run as "python -m cavitytally".

from .cli import run

if __name__ == "__main__":
    run()

import sys
from pathlib import Path

BACKEND_ROOT = Path(__file__).resolve().parent
if BACKEND_ROOT.as_posix() not in sys.path:
    sys.path.insert(0, BACKEND_ROOT.as_posix())

from app.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())

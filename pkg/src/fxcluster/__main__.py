"""``python -m fxcluster``."""
import sys

from .cli import main

sys.exit(main())

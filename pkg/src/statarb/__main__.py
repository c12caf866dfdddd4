"""Allow `python -m statarb`."""
from .cli import main

raise SystemExit(main())

import sys

from fastged.cli import main

sys.exit(main())

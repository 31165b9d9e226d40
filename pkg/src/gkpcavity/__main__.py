import sys

from gkpcavity.cli import main

sys.exit(main())

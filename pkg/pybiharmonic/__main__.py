import sys

from pybiharmonic.cli import main

sys.exit(main())

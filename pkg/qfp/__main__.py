import sys

from qfp.cli import main

sys.exit(main())

import sys

from qsurvey.cli import main

sys.exit(main())

import sys

from sgpivot.harness.cli import main

sys.exit(main())

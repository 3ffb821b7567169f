import sys

from svindex.workbench.cli import main

sys.exit(main())

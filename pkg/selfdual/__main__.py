import sys

from selfdual.cli import main

sys.exit(main())

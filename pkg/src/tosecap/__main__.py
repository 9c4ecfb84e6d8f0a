import sys

from tosecap.cli import main

sys.exit(main())

import sys

from rbfrepro.cli import main

sys.exit(main())

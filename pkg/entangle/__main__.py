import sys

from entangle.cli import main

sys.exit(main())

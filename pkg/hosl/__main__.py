import sys

from hosl.cli import main

sys.exit(main())

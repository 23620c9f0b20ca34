import sys

from prevfuse.cli import main

sys.exit(main())

import sys

from bellscope.cli import main

sys.exit(main())

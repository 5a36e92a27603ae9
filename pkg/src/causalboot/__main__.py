import sys

from causalboot.cli import main

sys.exit(main())

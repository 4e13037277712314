import sys

from granup.cli import main

sys.exit(main())

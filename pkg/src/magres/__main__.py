import sys

from magres.cli import main

sys.exit(main())

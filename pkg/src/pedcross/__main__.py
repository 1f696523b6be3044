import sys

from pedcross.cli import main

sys.exit(main())

import sys

from fracdr.cli import main

sys.exit(main())

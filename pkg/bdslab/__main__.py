import sys

from bdslab.main import main

sys.exit(main())

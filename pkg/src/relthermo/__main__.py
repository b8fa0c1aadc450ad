import sys

from .sweepcli import main

sys.exit(main())

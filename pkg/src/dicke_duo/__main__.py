import sys

from dicke_duo.cli import main

sys.exit(main())

import sys

from exprays.cli import main
sys.exit(main())

import sys

from src.qar.main import cli_main

sys.exit(cli_main())

from csmverify.cli import main
import sys

sys.exit(main())

from ryflow.cli import main
import sys
sys.exit(main())

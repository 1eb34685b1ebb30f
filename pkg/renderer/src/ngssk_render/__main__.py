import sys

from ngssk_render.cli import main

sys.exit(main())

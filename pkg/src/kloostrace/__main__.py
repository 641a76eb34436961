from __future__ import annotations

import sys

from kloostrace.cli import main

sys.exit(main())

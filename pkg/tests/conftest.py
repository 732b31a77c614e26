import sys
from pathlib import Path

# test-local helpers (reference implementations) importable by name
sys.path.insert(0, str(Path(__file__).parent))

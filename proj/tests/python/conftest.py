import os
import sys

# In-tree runs point OGSBL_CORE_DIR at the build directory holding _core;
# installed wheels import the ogsbl package directly.
core_dir = os.environ.get("OGSBL_CORE_DIR")
if core_dir and core_dir not in sys.path:
    sys.path.insert(0, core_dir)

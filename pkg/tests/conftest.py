import os

os.environ.setdefault("LERW_THREADS", "1")

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

PACKAGE_DIR = Path(__file__).resolve().parent.parent

# Enumeration and search bounds
POSLOG_CEILING = int(os.getenv("POSLOG_CEILING", "200000"))
POSLOG_DEPTH = int(os.getenv("POSLOG_DEPTH", "1"))
POSLOG_WIDTH_CAP = int(os.getenv("POSLOG_WIDTH_CAP", "2"))
POSLOG_DNF_CEILING = int(os.getenv("POSLOG_DNF_CEILING", "4096"))
POSLOG_WITNESS_DEPTH = int(os.getenv("POSLOG_WITNESS_DEPTH", "2"))

# check-suite settings
MAX_WORKERS = int(os.getenv("POSLOG_MAX_WORKERS", "4"))
SUITE_CONFIG_PATH = os.getenv(
    "POSLOG_SUITE_CONFIG", str(PACKAGE_DIR / "config" / "suite_config.json")
)
CORPUS_DIR = os.getenv("POSLOG_CORPUS_DIR", str(PACKAGE_DIR / "corpus"))

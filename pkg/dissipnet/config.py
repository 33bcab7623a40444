from pathlib import Path

NAME = "Dissipnet"
SCRIPT_DIR = Path(__file__).resolve().parent.parent
LOGFILE = SCRIPT_DIR / "logs" / "dissipnet.log"
LOG_BACKUPS = 7
LOG_LEVEL_ENV = "DISSIPNET_LOG_LEVEL"
OUTPUT_DIR_ENV = "DISSIPNET_OUT"
DEFAULT_OUTPUT_DIR = Path("results")

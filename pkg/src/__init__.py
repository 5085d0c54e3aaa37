"""Torus Rigidity Lab - 三维环面 Anosov 微分同胚刚性数值实验室"""

from pathlib import Path

BASE_DIR = Path(__file__).parent.parent
CONFIG_FILE = BASE_DIR / "config.yaml"
CACHE_DIR = BASE_DIR / "cache"
OUTPUT_DIR = BASE_DIR / "output"
LOGS_DIR = CACHE_DIR / "logs"
TEMPLATES_DIR = BASE_DIR / "templates"

__version__ = "0.1.0"

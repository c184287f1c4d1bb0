#!/usr/bin/env python3
# Shared configuration and logging for the robust mean estimation tools
# Environment is read once from .env (if present) and the process environment

import os, sys
from datetime import datetime
from dotenv import load_dotenv, dotenv_values

load_dotenv(override=True)

# --------- Config via env (verbosity only) ---------
LOG_LEVEL = os.getenv("LOG_LEVEL", "info").lower()  # quiet | info | debug
LOG_TIMESTAMPS = os.getenv("LOG_TIMESTAMPS", "true").lower() == "true"

if LOG_LEVEL not in ("quiet", "info", "debug"):
    print(f"[WARN] Unknown LOG_LEVEL={LOG_LEVEL}, using 'info'", file=sys.stderr)
    LOG_LEVEL = "info"

ARTIFACT_VERSION = "1.0.0"


def _emit(msg):
    if LOG_TIMESTAMPS:
        msg = f"[{datetime.now().strftime('%H:%M:%S')}] {msg}"
    # stdout is reserved for machine-readable output
    print(msg, file=sys.stderr, flush=True)


def log(msg):
    if LOG_LEVEL != "quiet":
        _emit(msg)


def debug(msg):
    if LOG_LEVEL == "debug":
        _emit(msg)


def warn(msg):
    _emit(f"⚠️  {msg}")


def read_key_values(path):
    """Read a flat KEY=value config file. Keys are lower-cased."""
    values = dotenv_values(path)
    return {key.strip().lower(): (value or "").strip() for key, value in values.items()}


def error(msg):
    _emit(f"❌ {msg}")

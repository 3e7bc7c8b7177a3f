"""FastAPI service exposing the simulator to CLI and HTTP clients."""

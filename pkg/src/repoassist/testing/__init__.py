"""In-process servers used by tests, replay runs and local demos."""

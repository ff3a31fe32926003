"""Edge IDS Bench: train, select and cost small intrusion classifiers for edge hardware."""

__version__ = "0.1.0"

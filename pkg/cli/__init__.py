"""Command-line interface for the federated label-flipping simulator."""

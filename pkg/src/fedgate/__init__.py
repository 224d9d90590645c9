"""Desk-scale federated learning service gated by decentralized identities."""

__version__ = "0.1.0"

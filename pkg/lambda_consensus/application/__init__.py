"""
Application Layer: Stress campaigns over seeded random runs
"""

from .campaign import CampaignReport, RunOutcome, StressCampaign, run_one

__all__ = ["CampaignReport", "RunOutcome", "StressCampaign", "run_one"]

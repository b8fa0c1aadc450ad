"""Print the closed-form vs oracle discrepancy report."""
import sys

from relthermo.sweepcli import discrepancy_report

if __name__ == "__main__":
    sys.stdout.write(discrepancy_report())

"""Giant identification: vote subnetworks, percolation stop rule and batch driver."""

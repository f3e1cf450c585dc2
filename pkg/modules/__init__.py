# Data Center Energy Audit: module package

// Placeholder until the guide chapters exist.

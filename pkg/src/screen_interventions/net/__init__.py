"""Transport: wire protocol, overlay server, replay client, latency budget."""

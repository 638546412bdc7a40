# Test package for cmvkit

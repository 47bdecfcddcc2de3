# anchors the test root so `import oracles` resolves from any invocation dir

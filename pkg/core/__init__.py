# Make core directory a proper package 
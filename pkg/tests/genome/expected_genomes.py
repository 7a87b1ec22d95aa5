ARCH0_LIST = [[[3, 3], [3, 2], [3, 0]], [8, [0, 0, 5, 2], [0, 2, 8, 8], [0, 5, 1, 4]]]

ARCH1_CANONICAL = "[[[2,3],[1,3],[4,4]],[2,[0,1,6,3],[0,1,2,8],[0,2,1,6]]]"

ARCH0_CANONICAL = "[[[3,3],[2,3],[0,3]],[8,[0,0,5,2],[0,2,8,8],[0,5,1,4]]]"

# Every connectivity pair has n (n + 1) / 2 unordered choices with pools of 4, 5 and 6
CANONICAL_CONNECTIVITY_COUNT = 10 * 15 * 21

ORDERED_CONNECTIVITY_COUNT = 16 * 25 * 36

# 11 op0 choices, then per branch (pool size)^2 * 11^2 with pools of 2, 5 and 8
CELL_UPPER_BOUND = 124_717_894_400

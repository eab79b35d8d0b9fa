package pp.battleship.model;

/**
 * A ship with a position, length and accumulated hits.
 */
public class Ship {
    public enum Orientation {
        HORIZONTAL, VERTICAL;

        public Orientation flipped() {
            return this == HORIZONTAL ? VERTICAL : HORIZONTAL;
        }
    }

    private final int length;
    private final Orientation orientation;
    private int hits;

    public Ship(int length, Orientation orientation) {
        this.length = length;
        this.orientation = orientation;
    }

    public int getLength() {
        return length;
    }

    public Orientation getOrientation() {
        return orientation;
    }

    public void hit() {
        hits++;
    }

    public boolean isSunk() {
        return hits >= length;
    }
}

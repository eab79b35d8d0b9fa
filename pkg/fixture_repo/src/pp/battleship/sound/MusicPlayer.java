package pp.battleship.sound;

/**
 * Looped background music playback with an on/off state independent of
 * one-shot sound effects.
 */
public class MusicPlayer {
    public static final String DEFAULT_TRACK = "Sound/music/menu_theme.ogg";

    private String track = DEFAULT_TRACK;
    private boolean playing;
    private float volume = 0.5f;

    public void play() {
        playing = true;
    }

    public void stop() {
        playing = false;
    }

    public boolean isPlaying() {
        return playing;
    }

    public void setTrack(String track) {
        this.track = track;
    }

    public void setVolume(float volume) {
        if (volume < 0f || volume > 1f) {
            throw new IllegalArgumentException("volume out of range: " + volume);
        }
        this.volume = volume;
    }

    public float getVolume() {
        return volume;
    }
}
